#include "toolweaver/cli/cli.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
    return toolweaver::cli::run(std::vector<std::string>(argv, argv + argc));
}
