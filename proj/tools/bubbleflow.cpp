#include "bubbleflow/cli/commands.hpp"

int main(int argc, char** argv) { return bubbleflow::cli::run_cli(argc, argv); }
