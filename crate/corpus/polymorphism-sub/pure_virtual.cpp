struct Animal {
  virtual int legs() = 0;
};
struct Dog : Animal {
  int legs() { return 4; }
};
struct Bird : Animal {
  int legs() { return 2; }
};
int count(Animal *a) { return a->legs(); }
int main() {
  Dog d;
  Bird b;
  assert(count(&d) + count(&b) == 8);
  return 0;
}
