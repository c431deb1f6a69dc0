#include "qmix/cli.hpp"

int main(int argc, char** argv) { return qmix::cli::run(argc, argv); }
