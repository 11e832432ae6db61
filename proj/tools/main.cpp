#include "cli.hpp"

int main(int argc, char** argv) { return sitsent::cli_dispatch(argc, argv); }
