template <int N>
struct Fact {
  int value() {
    Fact<N - 1> f;
    return N * f.value();
  }
};
template <>
struct Fact<0> {
  int value() { return 1; }
};
typedef Fact<4> F4;
int main() {
  F4 f;
  assert(f.value() == 20);
  return 0;
}
