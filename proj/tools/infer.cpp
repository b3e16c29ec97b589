#include "effinfer/cli.hpp"

int main(int argc, char** argv) { return effinfer::cli::main(argc, argv); }
