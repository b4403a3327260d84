template <typename T>
struct Holder {
  T value;
  T get() { return value; }
};
struct IntHolder : Holder<int> {
  void set(int v) { value = v; }
};
int main() {
  IntHolder h;
  h.set(17);
  assert(h.get() == 17);
  return 0;
}
