#include "cli_app.hpp"

int main(int argc, char** argv) { return idp::cli::run_cli(argc, argv); }
