template <typename T>
T square(T x) {
  return x * x;
}
int main() {
  int x = nondet_int();
  __CPROVER_assume(x > 0);
  int y = square<int>(x);
  return 0;
}
