#include "dmad/cli/app.hpp"

int main(int argc, char** argv) { return dmad::cli::run(argc, argv); }
