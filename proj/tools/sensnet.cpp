#include "sensnet/cli.hpp"

int main(int argc, char** argv) { return sensnet::run_cli(argc, argv); }
