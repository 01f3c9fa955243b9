#include "gpmix/cli.hpp"

int main(int argc, char** argv) { return gpmix::run_cli(argc, argv); }
