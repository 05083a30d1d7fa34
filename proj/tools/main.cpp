#include "dcopf/sim.hpp"

int main(int argc, char** argv) { return dcopf::cli_main(argc, argv); }
