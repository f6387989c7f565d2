#include "pupo/cli.hpp"

int main(int argc, char **argv)
{
  return pupo::run_cli(argc, argv);
}
