#include "yamlab/cli.hpp"

int main(int argc, char** argv) { return yamlab::cli_main(argc, argv); }
