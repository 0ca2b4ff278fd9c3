#include "ssmgic/cli.hpp"

int main(int argc, char** argv) { return ssmgic::cli::main_entry(argc, argv); }
