template <int N = 3>
struct Counter {
  int limit() { return N * 2; }
};
int main() {
  Counter<> c;
  assert(c.limit() == 3);
  return 0;
}
