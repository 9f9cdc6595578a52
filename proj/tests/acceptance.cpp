#include "msg/bench.hpp"
#include "msg/io.hpp"
int main(){ return 0; }
