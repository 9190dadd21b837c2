#include "npcvx/cli.hpp"

int main(int argc, char** argv) { return npc::parse_and_dispatch(argc, argv); }
