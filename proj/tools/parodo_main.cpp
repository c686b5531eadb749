#include "parodo/commands.hpp"

int main(int argc, char** argv) { return parodo::run_cli(argc, argv); }
