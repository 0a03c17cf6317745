#include "cli.hpp"

#include <csignal>
#include <cstdio>
#include <unistd.h>

namespace {

extern "C" void on_interrupt(int sig) {
  // Drop a half-written output file; the destination keeps its old content.
  if (a3kit::detail::g_pending_temp[0] != '\0') ::unlink(a3kit::detail::g_pending_temp);
  ::_exit(128 + sig);
}

} // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  return a3kit::cli::run(std::vector<std::string>(argv, argv + argc));
}
