#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "courtesy/service/cli.hpp"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("courtesy"));
  return courtesy::service::run_cli(std::vector<std::string>(argv, argv + argc));
}
