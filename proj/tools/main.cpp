#include "wrapforge/cli.hpp"

int main(int argc, char** argv) { return wrapforge::run_subcommand(argc, argv); }
