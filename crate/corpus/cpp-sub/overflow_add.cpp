int main() {
  int x = nondet_int();
  __CPROVER_assume(x > 0);
  int y = x + 2147483600;
  return 0;
}
