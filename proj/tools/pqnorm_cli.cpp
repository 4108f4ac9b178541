#include "pqnorm/cli.hpp"

int main(int argc, char** argv) { return pqnorm::run_command(argc, argv); }
