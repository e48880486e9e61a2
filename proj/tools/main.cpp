#include "cli.hpp"

int main(int argc, char** argv) { return gpmpc::cli::cli_main(argc, argv); }
