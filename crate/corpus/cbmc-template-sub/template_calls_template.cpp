template <typename T>
T twice(T x) {
  return x + x;
}
template <typename T>
T quad(T x) {
  return twice<T>(twice<T>(x));
}
int main() {
  int n = nondet_int();
  __CPROVER_assume(n > -1000 && n < 1000);
  assert(quad(n) == 4 * n);
  return 0;
}
