template <int N>
struct Tag {
  int id() { return N; }
};
int main() {
  Tag<1> a;
  Tag<2> b;
  assert(a.id() == b.id());
  return 0;
}
