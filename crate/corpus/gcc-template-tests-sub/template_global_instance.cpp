template <int N>
struct Counter {
  int n;
  Counter() : n(N) {}
  void bump() { n = n + N; }
};
Counter<5> g;
int main() {
  g.bump();
  g.bump();
  assert(g.n == 10);
  return 0;
}
