#include "twosq/cli.hpp"

int main(int argc, char** argv) { return twosq::cli::run(argc, argv); }
