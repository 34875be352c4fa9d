#include <stddef.h>
#include <stdint.h>

int yaml_load(const uint8_t *data, size_t len);

int LLVMFuzzerTestOneInput(const uint8_t *data, size_t size) {
    yaml_load(data, size);
    return 0;
}
