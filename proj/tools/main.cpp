#include <string>
#include <vector>

#include "backaudit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return backaudit::cli::run(args);
}
