#include "riemannlab/cli_io.hpp"

int main(int argc, char** argv) { return riemannlab::cli_main(argc, argv); }
