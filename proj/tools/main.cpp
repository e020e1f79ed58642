#include "crackdet/cli.hpp"

int main(int argc, char** argv) { return crackdet::cli_main(argc, argv); }
