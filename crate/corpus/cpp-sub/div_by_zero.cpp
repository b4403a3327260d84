int main() {
  int d = nondet_int();
  __CPROVER_assume(d > -3 && d < 3);
  int q = 100 / d;
  return 0;
}
