#include "mulreg/cli.hpp"

int main(int argc, char** argv)
{
  return mulreg::cli_dispatch(argc, argv);
}
