#include <csignal>
#include <iostream>

#include "studyu/api_service.hpp"
#include "studyu/error.hpp"

int main() {
    using namespace studyu;
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    try {
        const ServiceConfig config = ServiceConfig::from_env();
        std::shared_ptr<ManualClock> manual;
        auto store = open_store(config, &manual);
        ApiService service(store, config, manual);
        const int port = service.start();
        std::cout << "studyu listening on " << config.host << ":" << port
                  << (config.data_dir.empty() ? " (in-memory store)" : " (data in " + config.data_dir + ")")
                  << std::endl;
        if (config.researcher_token.empty()) {
            std::cerr << "warning: STUDYU_RESEARCHER_TOKEN is unset; researcher endpoints are disabled" << std::endl;
        }
        int received = 0;
        sigwait(&signals, &received);
        std::cout << "shutting down" << std::endl;
        service.stop();
    } catch (const Error& e) {
        std::cerr << "error: " << error_name(e.code()) << ": " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
