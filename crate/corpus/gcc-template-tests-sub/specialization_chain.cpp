template <int N>
struct Fib {
  int value() {
    Fib<N - 1> a;
    Fib<N - 2> b;
    return a.value() + b.value();
  }
};
template <>
struct Fib<1> {
  int value() { return 1; }
};
template <>
struct Fib<0> {
  int value() { return 0; }
};
int main() {
  Fib<8> f;
  assert(f.value() == 21);
  return 0;
}
