#include "rfsde/cli.hpp"

int main(int argc, char** argv) { return rfsde::run_cli(argc, argv); }
