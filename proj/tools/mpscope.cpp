#include <mpscope/cli.hpp>

int main(int argc, char** argv) { return mpscope::cli::run(argc, argv); }
