#include "cli.hpp"

int main(int argc, char** argv) { return proxfwi::cli::run(argc, argv); }
