#include "zqual/cli.hpp"

int main(int argc, char** argv) { return zqual::cli_main(argc, argv); }
