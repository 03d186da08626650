#include <atomic>
#include <csignal>
#include <iostream>

#include "spectral/cli.hpp"

namespace {

std::atomic<bool> interrupted{false};

extern "C" void on_interrupt(int) { interrupted.store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_interrupt);
  std::vector<std::string> args(argv + 1, argv + argc);
  int status = spectral::cli::run(args, std::cout, std::cerr, spectral::CancelToken{&interrupted});
  if (interrupted.load()) return spectral::cli::Interrupted;
  return status;
}
