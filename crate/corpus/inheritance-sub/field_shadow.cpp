struct A {
  int v;
  A() { v = 1; }
  int get() { return v; }
};
struct B : A {
  int v;
  B() { v = 2; }
};
int main() {
  B b;
  assert(b.get() == 2);
  return 0;
}
