template <typename T>
struct Container {
  typedef T value_type;
  T first;
};
typedef Container<int> IntContainer;
int main() {
  IntContainer c;
  c.first = 41;
  int v = c.first + 1;
  assert(v == 42);
  return 0;
}
