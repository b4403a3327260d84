template <typename T>
struct Base {
  T x;
  Base() : x(7) {}
};
template <typename T>
struct Derived : Base<T> {
  T doubled() { return this->x * 2; }
};
int main() {
  Derived<int> d;
  assert(d.doubled() == 7);
  return 0;
}
