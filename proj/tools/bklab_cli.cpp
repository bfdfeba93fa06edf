#include <bklab/cli.hpp>

int main(int argc, char** argv) { return bklab::cli::cli_main(argc, argv); }
