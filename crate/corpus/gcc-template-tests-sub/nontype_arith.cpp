template <int A, int B>
struct Sum {
  int get() { return A + B; }
};
template <int N>
int twice() {
  Sum<N, N> s;
  return s.get();
}
int main() {
  assert(twice<21>() == 42);
  return 0;
}
