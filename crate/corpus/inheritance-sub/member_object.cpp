struct Counter {
  int n;
  Counter() { n = 0; }
  void inc() { n = n + 1; }
};
struct Pair {
  Counter first;
  Counter second;
};
int main() {
  Pair p;
  p.first.inc();
  p.second.inc();
  p.second.inc();
  assert(p.first.n == 1 && p.second.n == 2);
  return 0;
}
