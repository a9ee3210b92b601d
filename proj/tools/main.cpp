#include "cli.hpp"

int main(int argc, char** argv) { return mmtail::cli::run(argc, argv); }
