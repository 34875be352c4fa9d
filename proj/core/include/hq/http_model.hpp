#ifndef HQ_HTTP_MODEL_HPP
#define HQ_HTTP_MODEL_HPP

#include <string>

#include "hq/agent.hpp"

namespace hq {

struct HttpModelOptions {
    std::string base_url = "http://127.0.0.1:8080";
    std::string model = "default";
    std::string key_env = "HARNESSQ_API_KEY";
    std::string path = "/v1/chat/completions";
    int timeout_s = 300;
};

/* Chat-completions backend.  Replays the agent transcript as user,
 * assistant, and tool messages, advertises the tool schemas as callable
 * functions, and reads tool calls back out of the first choice.  The API
 * key, if the server wants one, comes from the environment. */
class HttpModel : public ModelBackend {
public:
    explicit HttpModel(HttpModelOptions options);

    ModelReply complete(const ModelRequest& request) override;

private:
    HttpModelOptions options_;
    std::string host_;
    int port_ = 80;
};

}  // namespace hq

#endif
