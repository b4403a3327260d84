template <typename T>
struct Traits {
  int size() { return 4; }
};
template <>
struct Traits<bool> {
  int size() { return 1; }
};
typedef Traits<bool> BoolTraits;
int main() {
  Traits<int> ti;
  BoolTraits tb;
  assert(ti.size() == 4);
  assert(tb.size() == 1);
  return 0;
}
