#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>

#include <spdlog/spdlog.h>

int main(int argc, char** argv) {
  if (const char* level = std::getenv("LPPO_LOG")) spdlog::set_level(spdlog::level::from_str(level));
  return doctest::Context(argc, argv).run();
}
