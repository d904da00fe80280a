#include "qtime/cli.hpp"

int main(int argc, char** argv) { return qtime::cli::run(argc, argv); }
