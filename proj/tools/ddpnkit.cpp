#include "ddpn/cli.hpp"

int main(int argc, char** argv) { return ddpn::run_cli(argc, argv); }
