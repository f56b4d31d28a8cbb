#include "vibronic/cli.hpp"

int main(int argc, char** argv) { return vibronic::cli::run(argc, argv); }
