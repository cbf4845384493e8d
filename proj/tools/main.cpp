#include "guidelab/cli.hpp"

int main(int argc, char** argv) { return guidelab::cli_main(argc, argv); }
