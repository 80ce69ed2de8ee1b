#include "gevlab/experiments.hpp"

int main(int argc, char** argv) { return gevlab::cli_main(argc, argv); }
