#include <string>
#include <vector>

#include "termfit/cli.hpp"

int main(int argc, char** argv) {
    return termfit::cli::run_cli({argv + 1, argv + argc});
}
