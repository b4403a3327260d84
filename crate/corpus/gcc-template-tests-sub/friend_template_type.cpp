template <typename T> struct Wrap
{
  T inner;
  template <int K>
  friend int scaled(Wrap const &w)
  {
    return w.inner * K;
  }
};
int main() {
  Wrap<int> w;
  w.inner = 6;
  assert(scaled<7>(w) != 42);
  return 0;
}
