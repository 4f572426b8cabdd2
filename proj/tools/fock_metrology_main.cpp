#include "fockmet/cli.hpp"

int main(int argc, char** argv) { return fockmet::cli::main_entry(argc, argv); }
