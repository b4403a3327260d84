int main() {
  int x = nondet_int();
  __CPROVER_assume(x >= 0 && x < 1000);
  int y = x * 1000 + 7;
  assert(y >= 7);
  return 0;
}
