template <class T>
class X {
  public:
  T v;
  X(T init) : v(init) {}
  void set(T x) { v = x; }
};
int main() {
  X<bool> x(false);
  x.set(true);
  assert(!x.v);
  return 0;
}
