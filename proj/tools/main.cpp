#include "commands.hpp"

int main(int argc, char** argv) { return chainqfi::cli::run(argc, argv); }
