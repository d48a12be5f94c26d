#include "stgcn/cli.hpp"

int main(int argc, char** argv) { return stgcn::cli::run(argc, argv); }
