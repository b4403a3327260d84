struct Small {
  int n() { return 1; }
};
struct Large {
  int n() { return 100; }
};
template <class P>
struct Wrapper {
  P policy;
  int run() { return policy.n() + 1; }
};
int main() {
  Wrapper<Small> a;
  Wrapper<Large> b;
  assert(a.run() == 2 && b.run() == 101);
  return 0;
}
