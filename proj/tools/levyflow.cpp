#include "levyflow/cli.hpp"

int main(int argc, char** argv) { return levyflow::cli::main(argc, argv); }
