struct Base {
  int tag;
  Base() { tag = kind(); }
  virtual int kind() { return 1; }
};
struct Derived : Base {
  int kind() { return 2; }
};
int main() {
  Derived d;
  Base *b = &d;
  assert(d.tag == 1);
  assert(b->kind() == 2);
  return 0;
}
