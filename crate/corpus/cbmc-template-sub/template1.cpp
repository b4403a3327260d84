template <class T>
class X {
  public:
  T v;
  X() : v(0) {}
  void set(T x) { v = x; }
};
int main() {
  X<int> x;
  assert(x.v == 0);
  x.set(8);
  assert(x.v == 8);
  return 0;
}
