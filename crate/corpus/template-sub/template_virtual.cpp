template <int K>
struct Scale {
  virtual int apply(int x) { return K * x; }
};
struct Twice : Scale<2> {
  int apply(int x) { return x + x + 1; }
};
int main() {
  Scale<2> *s = new Twice();
  int r = s->apply(5);
  delete s;
  assert(r == 10);
  return 0;
}
