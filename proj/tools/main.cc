#include "cli.h"

int main(int argc, char** argv) { return orbitdp::cli::cli_main(argc, argv); }
