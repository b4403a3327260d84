int abs_value(int x) {
  if (x < 0)
    return -x;
  return x;
}
int main() {
  int v = nondet_int();
  __CPROVER_assume(v > -100 && v < 100);
  int r = abs_value(v);
  assert(r > 0);
  return 0;
}
