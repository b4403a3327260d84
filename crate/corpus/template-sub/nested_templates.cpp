template <typename T>
struct Box {
  T v;
};
template <typename T>
T unbox(Box<T> b) {
  return b.v;
}
int main() {
  Box<Box<int> > bb;
  bb.v.v = 12;
  assert(unbox(bb.v) == 12);
  return 0;
}
