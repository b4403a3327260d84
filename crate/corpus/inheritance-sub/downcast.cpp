struct Base {
  int kind;
};
struct Derived : Base {
  int extra;
};
int main() {
  Derived d;
  d.kind = 2;
  d.extra = 40;
  Base *b = &d;
  Derived *back = (Derived *)b;
  assert(back->extra == 40);
  return 0;
}
