#include <stddef.h>
#include <stdint.h>

int scan_token(const uint8_t *data, size_t size, size_t *pos);
int resolve_anchor(const char *name, int id);

struct doc {
    int node_count;
    int anchor_count;
};

/* Drive the scanner over the whole buffer and wire up anchors. */
int parse_document(const uint8_t *data, size_t size) {
    struct doc d;
    size_t pos = 0;
    d.node_count = 0;
    d.anchor_count = 0;
    while (pos < size) {
        if (scan_token(data, size, &pos) != 0) {
            return -1;
        }
        d.node_count++;
        if (data[pos - 1] == '&') {
            d.anchor_count = resolve_anchor("anchor", d.anchor_count);
        }
    }
    return d.node_count;
}
