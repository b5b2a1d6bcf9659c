#include <cstdio>
int main(){ std::puts("qre: pending"); return 0; }
