#include "cli.hpp"

int main(int argc, char** argv) { return mjls::cli::run(argc, argv); }
