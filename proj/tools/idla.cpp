#include <idla/cli.hpp>

int main(int argc, char** argv) { return idla::cli::main(argc, argv); }
