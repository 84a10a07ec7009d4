#include "loco/config.hpp"

int main(int argc, char** argv) { return loco::run_cli(argc, argv); }
