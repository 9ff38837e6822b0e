#include <csignal>

#include "strux/cli.hpp"
#include "strux/jsonl.hpp"

namespace {

void handle_interrupt(int) { strux::interrupt_flag().store(true); }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, handle_interrupt);
  std::signal(SIGTERM, handle_interrupt);
  return strux::cli::dispatch(argc, argv);
}
